/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE78_OS_Command_Injection__connect_tcp_07.java
Label Definition File: CWE78_OS_Command_Injection.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 78 CWE78_OS_Command_Injection
 * BadSource: connect_tcp Read data from an outbound tcp connection
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: validate the argument against an allow-list before executing
 *    BadSink : exec dynamic command execution with Runtime.getRuntime().exec()
 * Flow Variant: point-flaw Data flow: if(privateFive==5)
 *
 * */

package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE78_OS_Command_Injection__connect_tcp_07 extends AbstractTestCase
{
    private int privateFive = 5;

    public void bad() throws Throwable
    {
        String data;
        if (privateFive == 5)
        {
            data = "";
                    {
                        Socket socket = null;
                        BufferedReader readerBuffered = null;
                        try
                        {
                            socket = new Socket("host.example.org", 39544);
                            readerBuffered = new BufferedReader(new InputStreamReader(socket.getInputStream(), "UTF-8"));
                            data = readerBuffered.readLine();
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    public void good() throws Throwable
    {
        goodG2B();
        goodB2G();
    }

    /* goodG2B() - use goodsource and badsink */
    private void goodG2B() throws Throwable
    {
        String data;
        if (privateFive == 5)
        {
            data = "foo";
        }
        else
        {
            data = null;
        }
        String osCommand;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    osCommand = "c:\\WINDOWS\\SYSTEM32\\cmd.exe /c dir ";
                }
                else
                {
                    osCommand = "/bin/ls ";
                }
                Process process = Runtime.getRuntime().exec(osCommand + data);
                process.waitFor();
    }

    /* goodB2G() - use badsource and goodsink */
    private void goodB2G() throws Throwable
    {
        String data;
        if (privateFive == 5)
        {
            data = "";
                    {
                        Socket socket = null;
                        BufferedReader readerBuffered = null;
                        try
                        {
                            socket = new Socket("host.example.org", 39544);
                            readerBuffered = new BufferedReader(new InputStreamReader(socket.getInputStream(), "UTF-8"));
                            data = readerBuffered.readLine();
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
        }
        else
        {
            data = null;
        }
        String[] allowed = { "-l", "-a", "-la" };
                String argument = "-l";
                for (String candidate : allowed)
                {
                    if (candidate.equals(data))
                    {
                        argument = candidate;
                    }
                }
                IO.writeLine("listing with " + argument);
    }

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
