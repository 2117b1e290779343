/* TEMPLATE GENERATED TESTCASE FILE
Filename: CWE23_Relative_Path_Traversal__Property_17.java
Label Definition File: CWE23_Relative_Path_Traversal.label.xml
Template File: sources-sinks-point-flaw.tmpl.java
*/
/*
 * @description
 * CWE: 23 CWE23_Relative_Path_Traversal
 * BadSource: Property Read data from a system property
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: resolve the canonical path and require it to stay under the root
 *    BadSink : readFile no validation
 * Flow Variant: point-flaw Data flow: if(privateTrue) and if(privateFalse)
 *
 * */

package testcases.CWE23_Relative_Path_Traversal;

import testcasesupport.*;
import javax.servlet.http.*;
import java.io.*;
import java.net.*;
import java.util.StringTokenizer;
import java.util.logging.Level;

public class CWE23_Relative_Path_Traversal__Property_17 extends AbstractTestCase
{
    private boolean privateTrue = true;
    private boolean privateFalse = false;

    public void bad() throws Throwable
    {
        String data;
        if (privateTrue)
        {
            data = System.getProperty("user.home");
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

    public static void main(String[] args) throws ClassNotFoundException,
           InstantiationException, IllegalAccessException
    {
        mainFromConsole(args);
    }
}
