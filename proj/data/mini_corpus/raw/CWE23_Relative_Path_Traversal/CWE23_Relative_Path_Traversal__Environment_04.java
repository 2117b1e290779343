/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE23_Relative_Path_Traversal__Environment_04.java
Label Definition File: CWE23_Relative_Path_Traversal.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 23 CWE23_Relative_Path_Traversal
 * BadSource: Environment Read data from an environment variable
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: resolve the canonical path and require it to stay under the root
 *    BadSink : readFile no validation
 * Flow Variant: point-flaw Data flow: if(PRIVATE_STATIC_FINAL_TRUE) and if(PRIVATE_STATIC_FINAL_FALSE)
 *
 * */

package testcases.CWE23_Relative_Path_Traversal;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE23_Relative_Path_Traversal__Environment_04 extends AbstractTestCase
{
    private static final boolean PRIVATE_STATIC_FINAL_TRUE = true;
    private static final boolean PRIVATE_STATIC_FINAL_FALSE = false;

    public void bad() throws Throwable
    {
        String data;
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = System.getenv("ADD");
        }
        else
        {
            data = null;
        }
        String root;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    root = "C:\\uploads\\";
                }
                else
                {
                    root = "/home/user/uploads/";
                }
                if (data != null)
                {
                    File file = new File(root + data);
                    FileInputStream streamFileInputSink = null;
                    InputStreamReader readerInputStreamSink = null;
                    BufferedReader readerBufferdSink = null;
                    if (file.exists() && file.isFile())
                    {
                        try
                        {
                            streamFileInputSink = new FileInputStream(file);
                            readerInputStreamSink = new InputStreamReader(streamFileInputSink, "UTF-8");
                            readerBufferdSink = new BufferedReader(readerInputStreamSink);
                            IO.writeLine(readerBufferdSink.readLine());
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
                }
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
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = "foo";
        }
        else
        {
            data = null;
        }
        String root;
                if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
                {
                    root = "C:\\uploads\\";
                }
                else
                {
                    root = "/home/user/uploads/";
                }
                if (data != null)
                {
                    File file = new File(root + data);
                    FileInputStream streamFileInputSink = null;
                    InputStreamReader readerInputStreamSink = null;
                    BufferedReader readerBufferdSink = null;
                    if (file.exists() && file.isFile())
                    {
                        try
                        {
                            streamFileInputSink = new FileInputStream(file);
                            readerInputStreamSink = new InputStreamReader(streamFileInputSink, "UTF-8");
                            readerBufferdSink = new BufferedReader(readerInputStreamSink);
                            IO.writeLine(readerBufferdSink.readLine());
                        }
                        catch (IOException exceptIO)
                        {
                            IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                        }
                    }
                }
    }

    /* goodB2G() - use badsource and goodsink */
    private void goodB2G() throws Throwable
    {
        String data;
        if (PRIVATE_STATIC_FINAL_TRUE)
        {
            data = System.getenv("ADD");
        }
        else
        {
            data = null;
        }
        String root = "/home/user/uploads/";
                if (data != null)
                {
                    File file = new File(root + data);
                    if (!file.getCanonicalPath().startsWith(new File(root).getCanonicalPath()))
                    {
                        IO.writeLine("path outside the upload root");
                        return;
                    }
                    if (file.exists() && file.isFile())
                    {
                        IO.writeLine("found " + file.getName());
                    }
                }
    }

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
